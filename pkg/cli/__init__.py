import typer

from . import evaluate, simulate

app = typer.Typer(no_args_is_help=True, add_completion=False)
app.command(name="evaluate")(evaluate.evaluate)
app.command(name="compare")(evaluate.compare)
app.command(name="simulate")(simulate.simulate)
app.command(name="sweep")(simulate.sweep)
