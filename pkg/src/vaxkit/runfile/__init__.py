from .io import RUN_COLUMNS, RunFile, read_run, write_run

__all__ = ["RUN_COLUMNS", "RunFile", "read_run", "write_run"]
