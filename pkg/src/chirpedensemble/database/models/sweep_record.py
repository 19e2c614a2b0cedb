import sqlalchemy as sa
from sqlalchemy.dialects.sqlite import JSON

from chirpedensemble.database.models.base import Base, TimestampMixin


class SweepRecordRow(Base, TimestampMixin):
    __tablename__ = "sweep_records"

    id = sa.Column(sa.Integer, primary_key=True, index=True, autoincrement=True)
    run_id = sa.Column(sa.String, nullable=False, index=True)
    kind = sa.Column(sa.String, nullable=False, index=True)

    alpha = sa.Column(JSON, nullable=False)
    delta_choice = sa.Column(JSON, nullable=False)  # scalar or n x n selection
    eps1 = sa.Column(sa.Float, nullable=False)
    eps2 = sa.Column(sa.Float, nullable=False)

    fidelity = sa.Column(sa.Float, nullable=False)
    distance = sa.Column(sa.Float, nullable=False)
    norm_drift = sa.Column(sa.Float, nullable=False)
    degraded = sa.Column(sa.Boolean, default=False, nullable=False)
    wall_time = sa.Column(sa.Float, nullable=True)

    def __repr__(self):
        return (
            f"<SweepRecordRow(id={self.id}, run_id='{self.run_id}', eps1={self.eps1}, "
            f"eps2={self.eps2}, fidelity={self.fidelity})>"
        )
