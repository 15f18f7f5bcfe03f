"""Closed-loop constellation design: prompts, agents, and the round loop."""

from .agents import AgentContract, ScriptedAgent, scripted_agent
from .llm import (
    ENV_API_KEY,
    ENV_ENDPOINT,
    ENV_MODEL,
    ChatEndpointAgent,
    HttpTransport,
    RecordingTransport,
    ReplayTransport,
    extract_array_text,
    llm_agent,
)
from .loop import (
    DeviceSimConfig,
    Rejection,
    RoundRecord,
    RtfvConfig,
    RtfvResult,
    is_duplicate,
    read_transcript,
    run_rtfv,
    validate_solution,
    write_transcript,
)
from .prompts import (
    DEFAULT_GOALS,
    DEFAULT_GUIDANCE,
    DesignTask,
    InstructionSet,
    StructuredPrompt,
    build_instruction_set,
    build_structured_prompt,
    load_template,
    parse_feedback_block,
    render_ap_resource_info,
    render_feedback_block,
)

__all__ = [
    "AgentContract",
    "ScriptedAgent",
    "scripted_agent",
    "ENV_API_KEY",
    "ENV_ENDPOINT",
    "ENV_MODEL",
    "ChatEndpointAgent",
    "HttpTransport",
    "RecordingTransport",
    "ReplayTransport",
    "extract_array_text",
    "llm_agent",
    "DeviceSimConfig",
    "Rejection",
    "RoundRecord",
    "RtfvConfig",
    "RtfvResult",
    "is_duplicate",
    "read_transcript",
    "run_rtfv",
    "validate_solution",
    "write_transcript",
    "DEFAULT_GOALS",
    "DEFAULT_GUIDANCE",
    "DesignTask",
    "InstructionSet",
    "StructuredPrompt",
    "build_instruction_set",
    "build_structured_prompt",
    "load_template",
    "parse_feedback_block",
    "render_ap_resource_info",
    "render_feedback_block",
]
