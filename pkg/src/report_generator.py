"""
Report Generator - human-readable summaries of CLI reports
"""

import logging
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional

from rich.console import Console
from rich.table import Table

logger = logging.getLogger(__name__)

STATUS_MARKS = {True: "✓", False: "✗", None: "-"}


class ReportGenerator:
    """Render one JSON-ready report as text or rich tables"""

    def __init__(self, report: Dict, command: str):
        """
        Initialize report generator

        Args:
            report: JSON-ready report produced by a CLI command
            command: Command name shown in the header
        """
        self.report = report
        self.command = command
        self.timestamp = datetime.now()

    def _scalars(self) -> Dict:
        return {
            key: value for key, value in self.report.items()
            if not isinstance(value, (dict, list))
        }

    def _tables(self) -> Dict[str, List[Dict]]:
        return {
            key: value for key, value in self.report.items()
            if isinstance(value, list) and value and all(isinstance(row, dict) for row in value)
        }

    def generate_full_report(self) -> str:
        """
        Generate the complete text report

        Returns:
            Formatted report string
        """
        report = self._build_header()
        report += self._build_overview_section()
        for name, rows in self._tables().items():
            report += self._build_table_section(name, rows)
        report += self._build_footer()
        return report

    def _build_header(self) -> str:
        outcome = self.report.get("status", self.report.get("holds", "-"))
        return f"""
╔═══════════════════════════════════════════════════════╗
║       NETWORK REDUCTION REPORT                        ║
╠═══════════════════════════════════════════════════════╣
║ Command:        {self.command:<37} ║
║ Outcome:        {str(outcome):<37} ║
║ Generated:      {self.timestamp.strftime('%Y-%m-%d %H:%M:%S'):<37} ║
╚═══════════════════════════════════════════════════════╝

"""

    def _build_overview_section(self) -> str:
        section = f"""
OVERVIEW
{'=' * 60}
"""
        for key, value in self._scalars().items():
            section += f"{key:<24} {value}\n"
        return section + "\n"

    def _build_table_section(self, name: str, rows: List[Dict]) -> str:
        columns = list(rows[0])
        section = f"""
{name.upper()}
{'=' * 60}
"""
        for row in rows:
            mark = STATUS_MARKS.get(row.get("holds"), "") if "holds" in row else ""
            cells = "  ".join(f"{row.get(column)}" for column in columns if column != "holds")
            section += f"{mark} {cells}\n".lstrip()
        return section + "\n"

    def _build_footer(self) -> str:
        return f"""
{'=' * 60}
Generated: {self.timestamp.strftime('%Y-%m-%d %H:%M:%S')}
{'=' * 60}
"""

    def print_summary(self, console: Optional[Console] = None) -> None:
        """Print overview and tables with rich, on standard error by default"""
        console = console or Console(stderr=True)
        overview = Table(title=f"{self.command} report")
        overview.add_column("field")
        overview.add_column("value")
        for key, value in self._scalars().items():
            overview.add_row(str(key), str(value))
        console.print(overview)

        for name, rows in self._tables().items():
            table = Table(title=name)
            columns = list(rows[0])
            for column in columns:
                table.add_column(str(column))
            for row in rows:
                table.add_row(*(str(row.get(column)) for column in columns))
            console.print(table)

    def save_report(self, output_dir: str = "data/reports") -> Path:
        """
        Save report to file

        Args:
            output_dir: Output directory

        Returns:
            Path to saved report
        """
        output_path = Path(output_dir)
        output_path.mkdir(parents=True, exist_ok=True)

        timestamp = self.timestamp.strftime("%Y%m%d_%H%M%S")
        file_path = output_path / f"{self.command}_report_{timestamp}.txt"
        file_path.write_text(self.generate_full_report(), encoding="utf-8")
        logger.info(f"💾 Report saved to: {file_path}")
        return file_path
