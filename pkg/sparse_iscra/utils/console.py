"""
Console Output Helpers

Colored status lines, summary tables and progress bars for the command-line
harness. Every optional package degrades gracefully: without colorama the
text is printed plain, without prettytable/tabulate a simple aligned listing
is printed, without tqdm iterables are returned unchanged.

Colors:
    - Fore.CYAN: informational steps
    - Fore.GREEN: success
    - Fore.YELLOW: warnings, skipped checks
    - Fore.RED: errors, failed checks

Usage:
    from sparse_iscra.utils.console import Fore, print_colored, print_metric_table

    print_colored("Solving exam41 with iscra...", Fore.CYAN)
    print_metric_table([("relerr", 1.2e-7), ("nnz", 2)])
"""

from typing import Iterable, List, Optional, Sequence, Tuple, TypeVar

try:
    from colorama import Fore, init
    init(autoreset=True)
    color_enabled = True
except ImportError:
    color_enabled = False

    class Fore:
        """Dummy color class when colorama is not installed"""
        CYAN = ''
        GREEN = ''
        YELLOW = ''
        RED = ''
        BLUE = ''
        MAGENTA = ''

try:
    from prettytable import PrettyTable
    table_enabled = True
except ImportError:
    table_enabled = False

try:
    from tabulate import tabulate
except ImportError:
    tabulate = None

try:
    from tqdm import tqdm
except ImportError:
    tqdm = None

T = TypeVar("T")


def print_colored(text: str, color: str = '') -> None:
    """
    Print colored text to the console if colorama is available.

    Args:
        text: The message to print
        color: A colorama.Fore value (e.g., Fore.CYAN); empty for plain text
    """
    print(color + text if color_enabled and color else text)


def print_step(number: int, title: str) -> None:
    """Print a workflow step banner."""
    print_colored(f"\n=== STEP {number}: {title} ===", Fore.BLUE)


def format_value(value: object) -> str:
    """Render floats compactly for tables; everything else with str()."""
    if isinstance(value, float):
        return f"{value:.6g}"
    if value is None:
        return "-"
    return str(value)


def print_metric_table(rows: Sequence[Tuple[str, object]], title: Optional[str] = None) -> None:
    """
    Print a two-column Metric/Value table.

    Args:
        rows: (metric, value) pairs in display order
        title: Optional heading printed above the table
    """
    if title:
        print_colored(title, Fore.CYAN)
    if table_enabled:
        table = PrettyTable()
        table.field_names = ["Metric", "Value"]
        table.align["Metric"] = "l"
        for metric, value in rows:
            table.add_row([metric, format_value(value)])
        print_colored(table.get_string(), Fore.CYAN)
    else:
        width = max((len(metric) for metric, _ in rows), default=0)
        for metric, value in rows:
            print_colored(f"{metric.ljust(width)} : {format_value(value)}", Fore.CYAN)


def print_grid(rows: List[List[object]], headers: List[str]) -> None:
    """Print rows as a grid table (tabulate), falling back to plain text."""
    rendered = [[format_value(cell) for cell in row] for row in rows]
    if tabulate:
        print(tabulate(rendered, headers=headers, tablefmt="grid"))
    else:
        print(" | ".join(headers))
        for row in rendered:
            print(" | ".join(row))


def progress(iterable: Iterable[T], total: Optional[int] = None, desc: str = "", enabled: bool = True) -> Iterable[T]:
    """Wrap an iterable in a tqdm progress bar when tqdm is installed."""
    if tqdm is None or not enabled:
        return iterable
    return tqdm(iterable, total=total, desc=desc, leave=False)
