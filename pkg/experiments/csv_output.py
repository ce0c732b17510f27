import csv
import math
import numbers

SIGNIFICANT_DIGITS = 9


def format_cell(cell) -> str:
    if isinstance(cell, bool):
        return str(cell).lower()
    if isinstance(cell, numbers.Integral):
        return str(int(cell))
    if isinstance(cell, numbers.Real):
        if math.isnan(cell):
            return "nan"
        return format(float(cell), f".{SIGNIFICANT_DIGITS}g")
    return str(cell)


def write_report(report, stream):
    """Header row, then one row per report entry, floats to 9 digits."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(report.header)
    for row in report.rows:
        writer.writerow([format_cell(cell) for cell in row])
