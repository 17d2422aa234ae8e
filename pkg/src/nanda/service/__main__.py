"""Run the registry service: ``python -m nanda.service`` or ``nanda-service``.

Reads the config file named by ``NANDA_CONFIG`` (or ``--config``), replays
the event log, and serves. A broken log or config prints the failure and
exits non-zero before the listener ever opens.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import uvicorn

from nanda.errors import DomainError
from nanda.service.app import create_app
from nanda.service.config import load_config


def main() -> None:
    parser = argparse.ArgumentParser(prog="nanda-service")
    parser.add_argument("--config", type=Path, default=None,
                        help="config file (default: $NANDA_CONFIG)")
    args = parser.parse_args()

    try:
        config = load_config(args.config)
        app = create_app(config)
    except DomainError as err:
        print(f"startup refused: {err.code}: {err.message}", file=sys.stderr)
        sys.exit(1)

    uvicorn.run(app, host=config.listen_host, port=config.listen_port, log_level="info")


if __name__ == "__main__":
    main()
