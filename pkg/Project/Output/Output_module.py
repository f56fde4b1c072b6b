import io
import logging
import os
import tempfile
from pathlib import Path
from typing import Callable, Dict, List, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from Project.Errors import OutputError  # noqa: E402
from Project.Scenario import CorrelatorResult, SweepResult  # noqa: E402

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"
LOCAL_BOUND = 2.0
TSIRELSON_BOUND = 2 * np.sqrt(2)

SWEEP_COLUMNS = ["theta", "value", "converged", "evaluations"]
FIDELITY_COLUMNS = ["theta", "F_closed", "F_numeric", "abs_err"]


class OutputModule:
    '''
    Writes CSV tables and SVG plots. Every file is written to a temporary file in
    the target directory first and renamed into place, so a failed run leaves no
    partial output.

    :param header: key/value pairs recorded as `# key=value` lines on top of every CSV
    '''

    def __init__(self, header: Dict[str, str]):
        self.header = dict(header)

    def _header_lines(self) -> str:
        return "".join(f"# {key}={value}\n" for key, value in self.header.items())

    @staticmethod
    def _atomic_write(path: Union[str, Path], write: Callable[[io.IOBase], None], binary: bool = False):
        target = Path(path)
        tmp_name = None
        try:
            fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent)
            with os.fdopen(fd, "wb" if binary else "w", encoding=None if binary else "utf-8",
                           newline=None if binary else "") as handle:
                write(handle)
            os.replace(tmp_name, target)
        except OSError as e:
            if tmp_name is not None and os.path.exists(tmp_name):
                os.remove(tmp_name)
            raise OutputError(f"cannot write {target}: {e}") from e
        logger.info(f"wrote {target}")

    def csv_text(self, frame: pd.DataFrame, footer: Sequence[str] = ()) -> str:
        """The exact text `write_csv` puts on disk."""
        body = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        return self._header_lines() + body + "".join(f"# {line}\n" for line in footer)

    def write_csv(self, path: Union[str, Path], frame: pd.DataFrame, footer: Sequence[str] = ()):
        text = self.csv_text(frame, footer)
        self._atomic_write(path, lambda handle: handle.write(text))

    @staticmethod
    def sweep_frame(result: SweepResult) -> pd.DataFrame:
        return pd.DataFrame({
            "theta": result.theta_grid,
            "value": result.values,
            "converged": result.converged,
            "evaluations": result.evaluations,
        }, columns=SWEEP_COLUMNS)

    @staticmethod
    def fidelity_frame(theta: np.ndarray, closed: np.ndarray, numeric: np.ndarray) -> pd.DataFrame:
        return pd.DataFrame({
            "theta": theta,
            "F_closed": closed,
            "F_numeric": numeric,
            "abs_err": np.abs(np.asarray(closed) - np.asarray(numeric)),
        }, columns=FIDELITY_COLUMNS)

    @staticmethod
    def optimize_frame(result: CorrelatorResult) -> pd.DataFrame:
        """Optimal setting vector as `parameter,value` rows, then the correlator itself."""
        names = [p.name for p in result.scenario.setting_layout]
        return pd.DataFrame({
            "parameter": names + ["correlator"],
            "value": list(result.settings) + [result.value],
        })

    def plot_sweeps(self, path: Union[str, Path], results: List[SweepResult], degrees: bool = False):
        '''
        Overlays the sweep curves with the local bound 2 and the Tsirelson bound 2√2.

        :param degrees: label the θ axis in degrees (the data stays in radians)
        '''
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        for result in results:
            x = np.degrees(result.theta_grid) if degrees else result.theta_grid
            ax.plot(x, result.values, marker=".", linewidth=1.2, label=result.kind.value)
        ax.axhline(LOCAL_BOUND, color="#555555", linestyle="--", linewidth=1, label="local bound 2")
        ax.axhline(TSIRELSON_BOUND, color="#aa3333", linestyle=":", linewidth=1, label="2√2")
        ax.set_xlabel("θ (degrees)" if degrees else "θ (radians)")
        ax.set_ylabel("maximized correlator value")
        ax.legend(loc="best", fontsize="small")
        fig.tight_layout()

        buffer = io.BytesIO()
        fig.savefig(buffer, format="svg")
        plt.close(fig)
        self._atomic_write(path, lambda handle: handle.write(buffer.getvalue()), binary=True)


def read_csv(path: Union[str, Path]) -> pd.DataFrame:
    """Reads a CSV written by OutputModule, skipping the # header and footer lines."""
    return pd.read_csv(path, comment="#")


def read_footer(path: Union[str, Path]) -> Dict[str, float]:
    """`# label,value` lines after the table, e.g. {"threshold": 0.9023...}."""
    footer = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("# ") and "," in line and "=" not in line:
            label, value = line[2:].split(",", 1)
            footer[label] = float(value)
    return footer
