from .config import RunConfig, load_run_config
from .reporting import ReportWriter, format_value
from .cli import build_parser, main
