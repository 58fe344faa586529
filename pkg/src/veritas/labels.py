"""Four-way veracity labels shared by the dataset, classifier, and metrics."""
from __future__ import annotations

import enum


class VerdictLabel(enum.Enum):
    SUPPORTED = "Supported"
    REFUTED = "Refuted"
    NOT_ENOUGH_EVIDENCE = "Not Enough Evidence"
    CONFLICTING_EVIDENCE = "Conflicting Evidence/Cherrypicking"

    @property
    def display(self) -> str:
        """Canonical display string, as it appears in datasets and prompts."""
        return self.value

    @property
    def short(self) -> str:
        return _SHORT[self]


_SHORT = {
    VerdictLabel.SUPPORTED: "S",
    VerdictLabel.REFUTED: "R",
    VerdictLabel.NOT_ENOUGH_EVIDENCE: "N",
    VerdictLabel.CONFLICTING_EVIDENCE: "C",
}

# Fixed class order for reports and confusion matrices.
LABEL_ORDER: tuple[VerdictLabel, ...] = (
    VerdictLabel.SUPPORTED,
    VerdictLabel.REFUTED,
    VerdictLabel.NOT_ENOUGH_EVIDENCE,
    VerdictLabel.CONFLICTING_EVIDENCE,
)

_BY_KEY = {label.value.lower(): label for label in VerdictLabel}
_BY_KEY.update(
    {
        "conflicting evidence/cherry-picking": VerdictLabel.CONFLICTING_EVIDENCE,
        "support": VerdictLabel.SUPPORTED,
        "refute": VerdictLabel.REFUTED,
    }
)


def normalize_label(raw: str) -> VerdictLabel:
    """Map a dataset label string onto the enum, tolerating case and spacing.

    Raises ValueError for anything that is not one of the four classes.
    """
    key = " ".join(raw.strip().lower().split())
    try:
        return _BY_KEY[key]
    except KeyError:
        raise ValueError(f"unknown verdict label: {raw!r}") from None
