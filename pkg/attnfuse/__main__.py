# -*- coding: utf-8 -*-

# Copyright © 2023-2024 the attnfuse authors.

# Permission is hereby granted, free of charge, to any
# person obtaining a copy of this software and associated
# documentation files (the "Software"), to deal in the
# Software without restriction, including without limitation
# the rights to use, copy, modify, merge, publish,
# distribute, sublicense, and/or sell copies of the
# Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice
# shall be included in all copies or substantial portions of
# the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY
# KIND, EXPRESS OR IMPLIED, INCLUDING BUT NOT LIMITED TO THE
# WARRANTIES OF MERCHANTABILITY, FITNESS FOR A PARTICULAR
# PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE AUTHORS
# OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR
# OTHER LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR
# OTHERWISE, ARISING FROM, OUT OF OR IN CONNECTION WITH THE
# SOFTWARE OR THE USE OR OTHER DEALINGS IN THE SOFTWARE.

"""The attnfuse command line entry point."""

import os
import sys
import textwrap
import traceback

import doit.cmd_base
from doit.cmd_base import _wrap
from doit.cmd_help import Help as DoitHelp
from doit.doit_cmd import DoitMain

from . import __version__
from .attnfuse import AttnFuse
from .config import load_config_file
from .errors import ConfigError
from .log import configure_logging, connect_progress_logging, LOGGER, ColorfulFormatter, LoggingMode
from .plugin_categories import PIPELINE_OPTIONS, Command
from .utils import CONF_FILENAME, get_root_dir, sys_decode

# commands that write where the user stands instead of in the experiment root
ROOTLESS_COMMANDS = ('synth', 'version')

# long option -> configuration key it overrides
OPTION_KEYS = {option['long']: key for _, key, option in PIPELINE_OPTIONS}


def _colour_wanted() -> bool:
    if not sys.stderr.isatty() or os.name == 'nt':
        return False
    return os.getenv('ATTNFUSE_MONO') is None and os.getenv('TERM') != 'dumb'


def _pop_conf(args):
    """Remove ``--conf=PATH`` from ``args`` and return PATH (or None)."""
    for index, arg in enumerate(args):
        if arg.startswith('--conf='):
            del args[index]
            return arg[len('--conf='):]
    return None


def _logging_mode(args) -> LoggingMode:
    if '--strict' in args:
        return LoggingMode.STRICT
    if '-q' in args or '--quiet' in args:
        return LoggingMode.QUIET
    return LoggingMode.NORMAL


def _find_config(args):
    """Configuration file of the experiment the working directory belongs to."""
    command = args[0] if args else None
    if command is None or command in ROOTLESS_COMMANDS:
        return None
    root = get_root_dir()
    if not root:
        return None
    os.chdir(root)
    LOGGER.debug("Experiment root: %r", root)
    return CONF_FILENAME


def main(args=None):
    """Run attnfuse and return the exit code."""
    ColorfulFormatter._colorful = _colour_wanted()
    args = [sys_decode(arg) for arg in (sys.argv[1:] if args is None else args)]

    conf_filename = _pop_conf(args)
    configure_logging(_logging_mode(args))
    connect_progress_logging()
    if conf_filename is None:
        conf_filename = _find_config(args)

    try:
        values = load_config_file(conf_filename) if conf_filename else {}
    except ConfigError as exc:
        LOGGER.error(exc.describe())
        return 1

    if conf_filename:
        LOGGER.info("Using config file '{0}'".format(conf_filename))
        # folders in the file are relative to the file
        os.chdir(os.path.dirname(os.path.abspath(conf_filename)))

    values['__configuration_filename__'] = conf_filename
    values['__configured__'] = bool(conf_filename)
    return DoitAttnfuse(AttnFuse(**values)).run(args)


class Help(DoitHelp):
    """Show attnfuse usage."""

    @staticmethod
    def print_usage(cmds):
        """Print the list of commands."""
        print("attnfuse estimates attention levels from facial feature streams and evaluates "
              "fusion strategies with leave-one-user-out cross-validation.\n")
        print("Commands:")
        width = max(len(name) for name in cmds) + 2
        for name in sorted(cmds):
            print("  attnfuse {0} {1}".format(name.ljust(width), cmds[name].doc_purpose))
        print("\nRun 'attnfuse help <command>' for the options of a command.")


class DoitAttnfuse(DoitMain):
    """Command dispatch: the attnfuse plugins plus doit's help."""

    DOIT_CMDS = (Help,)
    BIN_NAME = 'attnfuse'

    def __init__(self, attnfuse):
        """Bind the dispatcher to an AttnFuse application."""
        super().__init__()
        self.attnfuse = attnfuse
        attnfuse.doit = self

    def get_cmds(self):
        """Get commands."""
        cmds = DoitMain.get_cmds(self)
        cmds.update(self.attnfuse._commands)
        return cmds

    def run(self, cmd_args):
        """Dispatch ``cmd_args`` to a command and return its exit code."""
        cmd_args = list(self.process_args(cmd_args)) or ['help']
        if '--help' in cmd_args or '-h' in cmd_args:
            cmd_args = ['help'] + [arg for arg in cmd_args if arg not in ('--help', '-h')]
        if '--version' in cmd_args or '-V' in cmd_args:
            cmd_args = ['version']

        self.attnfuse.init_plugins()
        commands = self.get_cmds()
        if cmd_args[0] not in commands:
            LOGGER.error("Unknown command {0}".format(cmd_args[0]))
            close = suggestions(cmd_args[0], commands)
            if close:
                LOGGER.info('Did you mean {0}?'.format(' or '.join('"{0}"'.format(c) for c in close)))
            return 3

        try:
            return super().run(cmd_args)
        except Exception:
            LOGGER.error('An unhandled exception occurred.')
            if self.attnfuse.debug or self.attnfuse.show_tracebacks:
                raise
            _print_exception()
            return 1

    @staticmethod
    def print_version():
        """Print attnfuse version."""
        print("attnfuse v" + __version__)


def _command_help(self: Command):
    """Help text of a command, naming the configuration key behind each option."""
    text = textwrap.wrap("{0} {1} {2}".format(self.bin_name, self.name, self.doc_usage), subsequent_indent='  ')
    text.extend(_wrap(self.doc_purpose, 4))
    text.append("\nOptions:")
    for opt in self.cmdparser.options:
        if not (opt.short or opt.long):
            continue
        text.extend(_wrap(opt.help_param(), 4))
        notes = []
        if opt.long in OPTION_KEYS:
            notes.append('config: {0}'.format(OPTION_KEYS[opt.long]))
        if opt.default not in ('', False, None):
            notes.append('default: {0}'.format(opt.default))
        text.extend(_wrap(opt.help + ''.join(' [{0}]'.format(n) for n in notes), 8))
        if opt.inverse:
            text.extend(_wrap('--{0}'.format(opt.inverse), 4))
            text.extend(_wrap('turn off --{0}'.format(opt.long), 8))
    if self.doc_description is not None:
        text.append("\nDescription:")
        text.extend(_wrap(self.doc_description, 4))
    return "\n".join(text)


doit.cmd_base.Command.help = _command_help


def edit_distance(a: str, b: str) -> int:
    """Number of single character insertions, deletions and substitutions turning ``a`` into ``b``."""
    row = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        diagonal, row[0] = row[0], i
        for j, cb in enumerate(b, 1):
            diagonal, row[j] = row[j], min(row[j] + 1, row[j - 1] + 1, diagonal + (ca != cb))
    return row[-1]


def suggestions(name, commands, limit=3):
    """The known commands closest to a mistyped ``name``, if any is close enough."""
    scored = sorted((edit_distance(name, c), c) for c in commands)
    if not scored or scored[0][0] > limit:
        return []
    return [c for d, c in scored if d == scored[0][0]]


def _print_exception():
    """Log the current exception in one line."""
    etype, evalue, _ = sys.exc_info()
    LOGGER.error(''.join(traceback.format_exception(etype, evalue, None, limit=0, chain=False)).strip())
    LOGGER.warning("Set ATTNFUSE_DEBUG=1 or ATTNFUSE_SHOW_TRACEBACKS=1 for the full traceback.")


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
