from .grammar import Spec, parse_expr, parse_spec
from .jobs import JobRequest, JobResult, run_job, verify_certificate
from .main import main

__all__ = ["JobRequest", "JobResult", "Spec", "main", "parse_expr", "parse_spec", "run_job", "verify_certificate"]
