import logging

from rich.table import Table

from tailcut.theory.checks import CheckResult

LOG = logging.getLogger(__name__)

_esctable = {
    "red": 31,
    "green": 32,
    "yellow": 33,
    "cyan": 36,
    "bold": 1,
}


class CheckPath(str):
    """
    used to wrap a change path so that nested matrix entries sort row by row, comparing
    each path level in turn
    """

    def __lt__(self, other):
        if not isinstance(other, CheckPath):
            raise ValueError("Incompatible types")

        for sa, sb in zip(self.split("/"), other.split("/"), strict=False):
            if sa != sb:
                return sa < sb
        return len(self) < len(other)


def _render_path_part(part):
    if isinstance(part, int):
        return f"[{part}]"
    return str(part)


def render_report(result: CheckResult) -> str:
    def _line(expectation, c) -> [(str, str)]:
        change_path = "/" + "/".join(_render_path_part(p) for p in c.path(output_format="list"))
        scale = "relative" if expectation.relative else "absolute"
        target = c.t1
        actual = c.t2

        if c.report_type == "values_changed":
            return [
                (
                    change_path,
                    f"[replace](~)[/replace] {change_path} {target!r} → {actual!r} "
                    f"... (target → computed, {scale} tolerance {expectation.tolerance:g})",
                )
            ]
        elif c.report_type == "type_changes":
            return [
                (
                    change_path,
                    f"[replace](~)[/replace] {change_path} {target!r} (type: {type(target)}) → "
                    f"{actual!r} (type: {type(actual)}) ... (target → computed)",
                )
            ]
        elif c.report_type in ["iterable_item_removed", "dictionary_item_removed"]:
            return [(change_path, f"[remove](-)[/remove] {change_path} ( {target!r} )")]
        elif c.report_type in ["iterable_item_added", "dictionary_item_added"]:
            return [(change_path, f"[add](+)[/add] {change_path} ( {actual!r} )")]
        else:
            LOG.warning(f"Unsupported diff mismatch reason: {c.report_type}. {target=} | {actual=}")
            return [
                (
                    change_path,
                    f"[unknown]?[/unknown] {change_path} Unsupported diff mismatch for {target!r} vs {actual!r}",
                )
            ]

    lines = []
    for expectation, diff in result.failed():
        for _cat, changes in diff.tree.items():
            for change in changes:
                lines.extend(_line(expectation, change))

    printstr = f">> check: {result.name} {result.parameters}\n"
    for _a, b in sorted(lines, key=lambda x: CheckPath(x[0])):
        printstr += f"\t{b}\n"

    replacement_map = {
        "remove": [_esctable["red"]],
        "add": [_esctable["green"]],
        "replace": [_esctable["yellow"]],
        "unknown": [_esctable["cyan"]],
    }
    for token, replacements in replacement_map.items():
        printstr = printstr.replace(f"[{token}]", "".join(f"\x1b[{code}m" for code in replacements))
        printstr = printstr.replace(f"[/{token}]", "\x1b[0m")

    return printstr


def _format_value(value) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_format_value(v) for v in value) + "]"
    return str(value)


def check_table(results: list[CheckResult]) -> Table:
    """Computed against target values for every expectation, one row each."""
    table = Table(title="theory checks")
    table.add_column("check")
    table.add_column("quantity")
    table.add_column("computed", justify="right")
    table.add_column("target", justify="right")
    table.add_column("tolerance", justify="right")
    table.add_column("status")
    for result in results:
        for expectation, diff in zip(result.expectations, result.diffs):
            scale = "rel" if expectation.relative else "abs"
            table.add_row(
                result.name,
                expectation.key,
                _format_value(result.computed[expectation.key]),
                _format_value(expectation.target),
                f"{expectation.tolerance:g} {scale}",
                "[red]FAIL[/red]" if diff else "[green]pass[/green]",
            )
    return table
