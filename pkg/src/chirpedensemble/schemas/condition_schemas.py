from typing import List, Literal, Set, Tuple

from pydantic import BaseModel, Field, model_validator

ConditionId = Literal["thm1-c1", "thm1-c2", "prop2", "coupling-zero"]


class Violation(BaseModel):
    """
    One failed gap or coupling hypothesis.
    """

    pair: Tuple[int, int]  # 1-based levels (j, k), j < k
    condition: ConditionId
    witnesses: List[List[float]] = []  # alpha vertices (or grid points) exhibiting the failure
    gaps: List[float] = []  # gap value at each witness
    detail: str = ""


class ConditionReport(BaseModel):
    """
    Verdict of a gap-condition check over the whole parameter box.
    """

    holds: bool
    violations: List[Violation] = Field(default_factory=list)
    warnings: List[str] = Field(default_factory=list)
    method: Literal["vertex", "grid"] = "vertex"

    @model_validator(mode="after")
    def _holds_iff_no_violation(self) -> "ConditionReport":
        if self.holds == bool(self.violations):
            raise ValueError("holds must be True exactly when there are no violations")
        return self

    def verdicts(self) -> Set[Tuple[Tuple[int, int], str]]:
        """(pair, condition) keys, used to compare two checking methods."""
        return {(v.pair, v.condition) for v in self.violations}

    def as_table(self) -> str:
        """Plain-text table for the CLI."""
        status = "HOLDS" if self.holds else "VIOLATED"
        lines = [f"conditions: {status} (method={self.method})"]
        if self.violations:
            lines.append(f"{'pair':<8}{'condition':<15}{'gap(s)':<28}witness alpha")
            for v in self.violations:
                gaps = ", ".join(f"{g:.6g}" for g in v.gaps) or "-"
                witnesses = "; ".join(str([round(a, 12) for a in w]) for w in v.witnesses) or "-"
                lines.append(f"{str(v.pair):<8}{v.condition:<15}{gaps:<28}{witnesses}")
        for warning in self.warnings:
            lines.append(f"warning: {warning}")
        return "\n".join(lines)
