from dotenv import load_dotenv

load_dotenv()

import logging
import os
import sys

from app.cli.experiment_commands import experiment_app

logging.basicConfig(stream=sys.stdout, level=os.getenv("LOG_LEVEL", "INFO").upper())

app = experiment_app

if __name__ == "__main__":
    app()
