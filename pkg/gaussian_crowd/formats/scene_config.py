"""
JSON scene configuration loading.

Validation is delegated to the pydantic models in ``gaussian_crowd.types``; unknown keys
are reported as warnings and otherwise ignored. Asset paths are resolved relative to the
config file's directory.
"""

from pathlib import Path
from typing import Iterator, List, Tuple, Union

from pydantic import BaseModel, ValidationError

from gaussian_crowd.avatar.skeleton import MotionClip
from gaussian_crowd.avatar.template import AvatarTemplate
from gaussian_crowd.constants import ERROR_CAPACITY
from gaussian_crowd.errors import CapacityError, SceneConfigError
from gaussian_crowd.formats.motion_file import load_motion
from gaussian_crowd.formats.template_file import load_template
from gaussian_crowd.logger_config import get_crowd_logger, log_unknown_config_key
from gaussian_crowd.types import SceneConfig

logger = get_crowd_logger(__name__)


def _unknown_keys(model: BaseModel, prefix: str = "") -> Iterator[str]:
    for key in (model.model_extra or {}):
        yield f"{prefix}{key}"
    for name in type(model).model_fields:
        value = getattr(model, name)
        if isinstance(value, BaseModel):
            yield from _unknown_keys(value, f"{prefix}{name}.")


def _describe(error: ValidationError) -> Tuple[str, str]:
    first = error.errors()[0]
    location = ".".join(str(part) for part in first["loc"]) or "<root>"
    messages = "; ".join(
        f"{'.'.join(str(p) for p in e['loc']) or '<root>'}: {e['msg']}" for e in error.errors()
    )
    return location, messages


def parse_scene_config(text: str, source: str = "<memory>") -> SceneConfig:
    try:
        config = SceneConfig.model_validate_json(text)
    except ValidationError as e:
        location, messages = _describe(e)
        raise SceneConfigError(f"{source}: {messages}", path=location) from e

    for key in _unknown_keys(config):
        log_unknown_config_key(logger, key, source)

    grid = config.grid
    if grid.capacity < config.crowd.count:
        raise CapacityError(
            ERROR_CAPACITY.format(grid.rows, grid.cols, grid.capacity, config.crowd.count)
        )
    return config


def load_scene_config(path: Union[str, Path]) -> SceneConfig:
    """Load and validate a scene; template and motion paths come back absolute"""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise SceneConfigError(f"cannot read scene config: {e}", path=str(path)) from e

    config = parse_scene_config(text, str(path))
    base = path.resolve().parent
    return config.model_copy(
        update={
            "templates": [str(base / p) for p in config.templates],
            "motions": [str(base / p) for p in config.motions],
        }
    )


def load_scene_assets(config: SceneConfig) -> Tuple[List[AvatarTemplate], List[MotionClip]]:
    templates = [load_template(p) for p in config.templates]
    motions = [load_motion(p) for p in config.motions]
    return templates, motions
