from .base import Base, TimestampMixin  # Re-export Base and TimestampMixin
from .sweep_record import SweepRecordRow

__all__ = ["Base", "TimestampMixin", "SweepRecordRow"]
