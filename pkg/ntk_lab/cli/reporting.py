import csv
import logging
import math
import os
from typing import Any, Mapping, Sequence

from jinja2 import Environment, PackageLoader

from ntk_lab.search import SearchResult

logger = logging.getLogger(__name__)


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "-inf" if value < 0 else "inf"
        return f"{value:.6f}"
    return str(value)


class ReportWriter:
    """
    Writes CSV reports plus a copy of the resolved run config next to each
    one, and renders console tables and search reports from the package
    templates.
    """

    def __init__(
        self,
        output_dir: str = ".",
        config_json: str = "{}",
        template_dir: str = "templates",
    ):
        env = Environment(
            loader=PackageLoader("ntk_lab.cli", template_dir),
            keep_trailing_newline=True,
        )
        self.table_template = env.get_template("table.jinja2")
        self.search_template = env.get_template("search_report.jinja2")
        self.output_dir = output_dir
        self.config_json = config_json

        if not os.path.exists(self.output_dir):
            os.makedirs(self.output_dir)

    def path(self, name: str) -> str:
        return name if os.path.isabs(name) else os.path.join(self.output_dir, name)

    def write_csv(self, name: str, rows: Sequence[Mapping[str, Any]], columns: Sequence[str] | None = None) -> str:
        columns = list(columns or (rows[0].keys() if rows else []))
        path = self.path(name)
        with open(path, "w", newline="") as file:
            writer = csv.writer(file, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([format_value(row[c]) for c in columns])
        self.write_provenance(path)
        logger.info(f"{path} written.")
        return path

    def write_provenance(self, path: str) -> None:
        with open(f"{path}.config.json", "w") as file:
            file.write(self.config_json + "\n")

    def table(self, rows: Sequence[Mapping[str, Any]], columns: Sequence[str] | None = None, title: str = "") -> str:
        columns = list(columns or (rows[0].keys() if rows else []))
        cells = [[format_value(row[c]) for c in columns] for row in rows]
        widths = [max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(columns)]
        return self.table_template.render(title=title, columns=columns, rows=cells, widths=widths)

    def search_report(self, name: str, result: SearchResult, exhaustive_epochs: int) -> str:
        speedup = exhaustive_epochs / result.epochs_trained if result.epochs_trained else float("inf")
        text = self.search_template.render(
            result=result,
            config=self.config_json,
            exhaustive_epochs=exhaustive_epochs,
            speedup=speedup,
            fmt=format_value,
        )
        path = self.path(name)
        with open(path, "w") as file:
            file.write(text)
        logger.info(f"{path} written.")
        return path
