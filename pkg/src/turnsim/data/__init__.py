"""Access to the bundled cabin layouts and turnaround scenarios."""

from importlib import resources

from ..cabin import parse_layout
from ..errors import ValidationError


def _subdir(name):
    return resources.files(__package__).joinpath(name)


def list_layouts():
    """Names of the bundled cabin layouts."""
    return sorted(p.name[:-4] for p in _subdir("layouts").iterdir() if p.name.endswith(".cab"))


def list_scenarios():
    """Names of the bundled turnaround scenarios."""
    return sorted(p.name[:-4] for p in _subdir("scenarios").iterdir() if p.name.endswith(".scn"))


def layout_text(name):
    path = _subdir("layouts").joinpath(name + ".cab")
    if not path.is_file():
        raise ValidationError(f"no bundled layout {name!r}; have {list_layouts()}")
    return path.read_text()


def scenario_text(name):
    path = _subdir("scenarios").joinpath(name + ".scn")
    if not path.is_file():
        raise ValidationError(f"no bundled scenario {name!r}; have {list_scenarios()}")
    return path.read_text()


def load_layout(name):
    """Parse a bundled layout into a CabinGrid."""
    return parse_layout(layout_text(name))
