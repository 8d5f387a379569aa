# core/logger.py
import os
import json
import logging
from datetime import datetime, timezone


def setup_logging(level=None, log_file=None):
    """Root logging setup; level/file default to RLAB_LOG_LEVEL / RLAB_LOG_FILE"""
    level = (level or os.getenv("RLAB_LOG_LEVEL") or "INFO").upper()
    logging.basicConfig(
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        level=getattr(logging, level, logging.INFO),
        force=True,
    )
    return RunLogger(log_file if log_file is not None else os.getenv("RLAB_LOG_FILE"))


class RunLogger:
    """Run events to the log, mirrored as JSON lines into an event file when one is set"""

    # Emoji mapping
    emojis = {
        "SIEVE": "🧮",
        "CACHE": "💾",
        "VERIFY": "🧪",
        "RESONATE": "🌀",
        "SCAN": "🔍",
        "REPORT": "📈",
        "ERROR": "❌",
        "CONFIG": "⚙️",
    }

    def __init__(self, log_file=None):
        self.log_file = log_file
        self.events = []

    def log(self, event_type: str, details: str = "", extra: dict = None):
        icon = self.emojis.get(event_type, "📝")
        level = logging.ERROR if event_type == "ERROR" else logging.INFO
        message = f"{icon} {event_type}: {details}"
        if extra:
            message += " | " + ", ".join(f"{k}={v}" for k, v in sorted(extra.items()))
        logging.log(level, message)

        record = {"event": event_type, "details": details}
        if extra:
            record["extra"] = extra
        self.events.append(record)
        if self.log_file:
            self._append(record)

    def _append(self, record):
        line = dict(record, timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"))
        try:
            with open(self.log_file, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(line, sort_keys=True, default=str) + "\n")
        except OSError as e:
            logging.error(f"❌ Failed to write event log {self.log_file}: {e}")
