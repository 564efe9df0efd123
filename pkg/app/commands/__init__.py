# CLI commands
from app.commands.invert import cmd_invert
from app.commands.simulate import cmd_simulate
from app.commands.verify import cmd_verify

__all__ = ["cmd_simulate", "cmd_invert", "cmd_verify"]
