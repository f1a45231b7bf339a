from .testing import ReferenceCase, ReferenceCases  # type: ignore # noqa: F401,F403
from .errors import *  # noqa: F401,F403
from .numerics import *  # noqa: F401,F403
from .levy_model import *  # noqa: F401,F403
from .scale import *  # noqa: F401,F403
from .parisian_ruin import *  # noqa: F401,F403
from .dividend_ruin_delay import *  # noqa: F401,F403
from .dividend_payment_delay import *  # noqa: F401,F403
from .simulate import *  # noqa: F401,F403
from .grids import *  # noqa: F401,F403
from .config import *  # noqa: F401,F403
