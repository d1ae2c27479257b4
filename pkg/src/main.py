import sys
from typing import List, Optional

from input_handler import RunConfig, parse_args


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    config: RunConfig = parse_args(argv)

    from run import start

    return start(config)


if __name__ == "__main__":
    sys.exit(main())
