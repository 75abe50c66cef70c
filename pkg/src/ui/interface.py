"""
Terminal Output Manager

Status output of a study run: a boxed header, the echoed configuration, a
per-level summary table and color-coded status lines. Everything goes to one
stream so that the report itself can own standard output.
"""

import os
import sys
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, TextIO


class Colors:
    """ANSI escape codes used by UIManager."""
    BOLD = '\033[1m'
    CYAN = '\033[96m'
    GREEN = '\033[92m'
    RED = '\033[91m'
    END = '\033[0m'


@dataclass(frozen=True)
class Glyphs:
    """Box-drawing and status characters."""
    horizontal: str
    vertical: str
    corners: str  # top-left, top-right, bottom-left, bottom-right
    tees: str     # left tee, cross, right tee
    double_horizontal: str
    double_vertical: str
    double_corners: str
    arrow: str
    check: str
    cross: str


UNICODE_GLYPHS = Glyphs('─', '│', '┌┐└┘', '├┼┤', '═', '║', '╔╗╚╝', '→', '✓', '✗')
ASCII_GLYPHS = Glyphs('-', '|', '++++', '+++', '=', '|', '++++', '->', '[OK]', '[X]')


class UIManager:
    """
    Terminal output for study runs.

    Colors are used only when the stream is a terminal; box characters fall
    back to ASCII on Windows consoles unless forced.
    """

    def __init__(self, use_colors: bool = True, width: int = 80,
                 use_unicode: Optional[bool] = None, stream: Optional[TextIO] = None):
        """
        Args:
            use_colors: Enable ANSI colors on terminals
            width: Width of the header box
            use_unicode: Force box characters on/off (None = auto-detect)
            stream: Output stream (default: standard output)
        """
        self.width = width
        self.stream = stream or sys.stdout
        if use_unicode is None:
            use_unicode = os.name != 'nt'
        self.glyphs = UNICODE_GLYPHS if use_unicode else ASCII_GLYPHS
        is_tty = getattr(self.stream, 'isatty', lambda: False)()
        self.colored = use_colors and is_tty and os.name != 'nt'

    def _style(self, text: str, *codes: str) -> str:
        if not self.colored or not codes:
            return text
        return ''.join(codes) + text + Colors.END

    def _print(self, text: str = "") -> None:
        print(text, file=self.stream)

    def print_header(self, title: str, subtitle: Optional[str] = None):
        """Title (and subtitle) in a double-line box."""
        g = self.glyphs
        inner = self.width - 2
        tl, tr, bl, br = g.double_corners
        self._print(self._style(tl + g.double_horizontal * inner + tr, Colors.BOLD))
        for text, codes in ((title, (Colors.BOLD, Colors.CYAN)), (subtitle, ())):
            if text:
                self._print(g.double_vertical + self._style(text.center(inner), *codes) + g.double_vertical)
        self._print(self._style(bl + g.double_horizontal * inner + br, Colors.BOLD))

    def print_key_value(self, data: Dict[str, Any], indent: int = 2):
        """Aligned ``key -> value`` lines."""
        if not data:
            return
        key_width = max(len(str(k)) for k in data)
        for key, value in data.items():
            self._print(f"{' ' * indent}{self._style(str(key).ljust(key_width), Colors.BOLD)} "
                        f"{self.glyphs.arrow} {value}")

    def print_table(self, headers: Sequence[str], rows: List[Sequence[str]]):
        """
        Boxed table; cells are right-aligned.

        Args:
            headers: Column headers
            rows: Rows of already formatted cells
        """
        if not rows:
            return
        g = self.glyphs
        widths = [max(len(str(h)), *(len(str(row[i])) for row in rows)) for i, h in enumerate(headers)]
        tl, tr, bl, br = g.corners
        left, cross, right = g.tees

        def rule(a: str, mid: str, b: str) -> str:
            return a + mid.join(g.horizontal * (w + 2) for w in widths) + b

        def line(cells: Sequence[str]) -> str:
            body = f" {g.vertical} ".join(str(c).rjust(w) for c, w in zip(cells, widths))
            return f"{g.vertical} {body} {g.vertical}"

        self._print(rule(tl, g.horizontal, tr))
        self._print(self._style(line(headers), Colors.BOLD))
        self._print(rule(left, cross, right))
        for row in rows:
            self._print(line(row))
        self._print(rule(bl, g.horizontal, br))

    def print_success(self, message: str):
        self._print(f"{self._style(self.glyphs.check, Colors.GREEN)} {message}")

    def print_error(self, message: str):
        self._print(f"{self._style(self.glyphs.cross, Colors.RED)} {message}")

    def print_info(self, message: str):
        self._print(f"{self._style('i', Colors.CYAN)} {message}")
