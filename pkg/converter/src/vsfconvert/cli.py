"""The `convert` command."""

import argparse
import sys

from .convert import KINDS, ConvertError, convert


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="convert",
                description="convert a benchmark HDF5 feature file into "
                            "the VSF container")
    p.add_argument("--src", required=True, metavar="H5",
                   help="source HDF5 file")
    p.add_argument("--kind", required=True, choices=KINDS,
                   help="which public dataset layout the source follows")
    p.add_argument("--out", required=True, metavar="VSF",
                   help="output VSF file")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    try:
        report = convert(args.src, args.out, args.kind)
    except (ConvertError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    for line in report.lines():
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
