# main.py - bolza-lab entry point

import logging
import sys

import config
from lab_cli.app import cli_run

# =====================================
# LOGGING
# =====================================
logging.basicConfig(
    level=getattr(logging, config.LOG_LEVEL.upper(), logging.INFO),
    format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    stream=sys.stderr,
)

# =====================================
# RUN
# =====================================
if __name__ == "__main__":
    sys.exit(cli_run())
