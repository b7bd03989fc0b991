"""Main client for the ov-approx toolkit"""

import logging
from typing import Any, Dict, Optional

from .config import Settings
from .exceptions import InvalidArgumentError
from .managers import CountingManager, DecisionManager, MaxIPManager, PolynomialManager
from .rng import SeededRng

logger = logging.getLogger(__name__)


class OVToolkit:
    """Facade over the counting, decision and Max-IP algorithms"""

    def __init__(
        self,
        settings: Optional[Settings] = None,
        seed: Optional[int] = None,
        threads: Optional[int] = None,
    ):
        """
        Initialize the toolkit.

        Args:
            settings: Effective settings (defaults to Settings.from_env())
            seed: Override for settings.seed
            threads: Override for settings.threads

        Raises:
            InvalidArgumentError: If threads < 1
            ConfigurationError: If an OVAPPROX_* variable is malformed
        """
        base = settings if settings is not None else Settings.from_env()
        self.settings = base.with_overrides(seed=seed, threads=threads)
        if self.settings.threads < 1:
            raise InvalidArgumentError(f"threads must be >= 1, got {self.settings.threads}")
        self._root = SeededRng(self.settings.seed)

        # Initialize managers
        self.polynomials = PolynomialManager(self)
        self.counting = CountingManager(self)
        self.decision = DecisionManager(self)
        self.maxip = MaxIPManager(self)
        logger.debug("OVToolkit ready: %s", self.settings)

    @property
    def seed(self) -> int:
        return self.settings.seed

    @property
    def threads(self) -> int:
        return self.settings.threads

    def rng(self, label: str) -> SeededRng:
        """Stream for one operation, fixed by (seed, label)"""
        return self._root.derive(label)

    @property
    def config(self) -> Dict[str, Any]:
        """Effective settings as a plain dict"""
        return self.settings.to_dict()

    def __repr__(self) -> str:
        return f"OVToolkit(seed={self.seed}, threads={self.threads})"
