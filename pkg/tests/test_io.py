from unittest import TestCase
from contextlib import redirect_stdout
import io
import os
from pathlib import Path
import logging
import logging.config
import tempfile

cur_dir = Path(os.path.abspath(__file__)).parent
src_path = cur_dir.parent / "src"

from crnase.core import NoSignChange
from crnase.io.base import (
    ConsoleCrnIO,
    RotatingFileLoggerCrnIO,
    PredefinedLoggerCrnIO,
)


class CrnIOTestCase(TestCase):
    def test_01_console(self):
        crn_io = ConsoleCrnIO("crnase.test.console", level=logging.DEBUG)
        self.assertIs(ConsoleCrnIO("crnase.test.console"), crn_io)
        with self.assertLogs("crnase.test.console", level="DEBUG") as logs:
            crn_io.log_info("Logging info")
            crn_io.log_warning("Logging warning")
            crn_io.log_debug("Logging debug")
        self.assertEqual(len(logs.records), 3)

        buffer = io.StringIO()
        with redirect_stdout(buffer):
            crn_io.user_info_text("x_db,ase_bps_hz")
        self.assertEqual(buffer.getvalue(), "x_db,ase_bps_hz\n")

    def test_02_rotating(self):
        with tempfile.TemporaryDirectory() as tmp:
            filename = str(Path(tmp) / "test-rotating.log")
            crn_io = RotatingFileLoggerCrnIO("crnase.test.rotating", filename)
            crn_io.log_info("Logging info")
            crn_io.log_warning("Logging warning")
            crn_io.log_debug("Logging debug")
            for handler in crn_io.logger.handlers:
                handler.flush()
            content = Path(filename).read_text()
            self.assertIn("Logging warning", content)
            self.assertIn("test_io.py", content)
            for handler in list(crn_io.logger.handlers):
                handler.close()
                crn_io.logger.removeHandler(handler)

    def test_03_console_handler_reused(self):
        ConsoleCrnIO("crnase.test.handlers", level=logging.INFO)
        crn_io = ConsoleCrnIO("crnase.test.handlers", level=logging.DEBUG)
        handlers = logging.getLogger("crnase.test.handlers").handlers
        self.assertEqual(len(handlers), 1)
        self.assertEqual(handlers[0].level, logging.DEBUG)
        self.assertIs(crn_io.logger, logging.getLogger("crnase.test.handlers"))

    def test_04_predefined(self):
        LOGGING = {
            "version": 1,
            "disable_existing_loggers": False,
            "formatters": {
                "standard": {
                    "format": "[%(asctime)s] %(levelname)s [%(name)s:%(lineno)s] "
                    "%(message)s - %(pathname)s",
                    "datefmt": "%d/%b/%Y %H:%M:%S",
                },
            },
            "handlers": {
                "console": {
                    "level": "DEBUG",
                    "class": "logging.StreamHandler",
                    "formatter": "standard",
                },
            },
            "loggers": {
                "crnase.test.predefined": {
                    "handlers": ["console"],
                    "level": "INFO",
                    "propagate": True,
                },
            },
        }
        logging.config.dictConfig(LOGGING)
        crn_io = PredefinedLoggerCrnIO("crnase.test.predefined")
        with self.assertLogs("crnase.test.predefined", level="INFO") as logs:
            crn_io.log_info("Logging info")
            crn_io.log_warning("Logging warning")
            crn_io.log_debug("Logging debug")
        self.assertEqual(len(logs.records), 2)
        # stacklevel points the record at the caller, not at the IO class
        self.assertTrue(all(r.pathname.endswith("test_io.py") for r in logs.records))

    def test_05_traceback(self):
        crn_io = PredefinedLoggerCrnIO("crnase.test.traceback")
        try:
            bracket_hi = 1e6
            raise NoSignChange(f"residual still positive at {bracket_hi}", side="upper")
        except NoSignChange as exc:
            with self.assertLogs("crnase.test.traceback", level="ERROR") as logs:
                crn_io.log_traceback(exc)
        self.assertIn("bracket_hi", logs.output[0])
