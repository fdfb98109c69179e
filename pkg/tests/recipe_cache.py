"""Run each bundled recipe at most once per test session."""
import functools

from bathent.cli import recipe_text
from bathent.config import loads_config
from bathent.driver import run


@functools.lru_cache(maxsize=None)
def recipe_records(name):
    return tuple(run(loads_config(recipe_text(name))))


def column(records, label, **where):
    """Values of ``label`` in the rows whose other columns match ``where`` (by label)."""
    out = []
    for rec in records:
        if all(rec[k] == v for k, v in where.items()):
            out.append(rec[label])
    return out
