"""Job/candidate category vocabulary."""

from __future__ import annotations

# The production vocabulary: 16 categories curated by recruiters.
DEFAULT_CATEGORIES = (
    "Technology",
    "Product",
    "Supply Chain",
    "Logistics",
    "Content",
    "Customer Experience",
    "Marketing",
    "Advertising",
    "Data",
    "Gaming",
    "General",
    "Design",
    "Operations",
    "Sales",
    "Project management",
    "Risk management",
)


class CategoryVocab:
    """Ordered category names with 0-based ids; unknown lookups fail."""

    def __init__(self, names=DEFAULT_CATEGORIES):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ValueError("category names must be unique")
        if not names:
            raise ValueError("vocabulary must not be empty")
        self.names = names
        self._index = {name: i for i, name in enumerate(names)}

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def id_of(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown category {name!r}; known: {', '.join(self.names)}") from None

    def name_of(self, category_id: int) -> str:
        if not 0 <= category_id < len(self.names):
            raise IndexError(f"category id {category_id} out of range [0, {len(self.names)})")
        return self.names[category_id]
