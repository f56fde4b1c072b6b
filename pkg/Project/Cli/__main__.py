from Project.Cli.cli import belltide

belltide(prog_name="belltide")
