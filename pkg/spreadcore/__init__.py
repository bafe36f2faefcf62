"""spreadcore: Spreading speeds of periodic nonlocal competition systems."""

import logging
from .const import __version__  # noqa
from .determinacy import DeterminacyReport, determinacy_verdict  # noqa
from .exceptions import *  # noqa
from .expr import parse  # noqa
from .habitat import HabitatSpec, load_config, load_habitat  # noqa
from .pool import WorkerPool  # noqa
from .sessions import Session, session, sweep  # noqa

logging.getLogger(__package__).addHandler(logging.NullHandler())
