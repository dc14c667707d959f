"""
fracsym CLI入口
"""

import click
import sys
from . import __version__
from .commands import verify, figure1, regularity, specialfn_check, conf


@click.group()
@click.version_option(__version__, prog_name="fracsym")
def cli() -> None:
    """分数阶 p-Laplace 方程对称化比较的数值实验"""
    click.echo(f"fracsym version: {__version__}", err=True)


@click.command()
@click.argument("command_name", required=False, type=str)
def help(command_name: str | None) -> None:
    """显示命令的帮助信息

    如果提供了 COMMAND_NAME，则显示该命令的详细帮助信息。
    否则，显示通用帮助信息。
    """
    ctx = click.get_current_context()
    if command_name:
        command = cli.get_command(ctx, command_name)
        if command:
            click.echo(command.get_help(ctx))
        else:
            click.echo(f"Unknown command: {command_name}")
            sys.exit(1)
    else:
        click.echo(cli.get_help(ctx))


cli.add_command(verify)
cli.add_command(figure1)
cli.add_command(regularity)
cli.add_command(specialfn_check)
cli.add_command(conf)
cli.add_command(help)

if __name__ == "__main__":
    cli()
