from sage.agents.backends import Completion, CompletionBackend, HttpBackend, MockBackend, RuleBackend  # noqa: F401
from sage.agents.parsing import ParsedCandidate, parse_detector_response, parse_supervisor_response  # noqa: F401
from sage.agents.prompts import PROMPT_VERSION, ROLES, PromptBundle, render_prompt  # noqa: F401
from sage.agents.supervisor import ALARM_LEVELS, ConfirmedAnomaly, DiagnosisReport, severity, supervise  # noqa: F401
