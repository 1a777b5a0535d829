# ─────────────────────────────────────────────────────────────────────────────
#  Target registry
#
#  Each built-in target maps to an instrumented module in targets/.
#  Targets run in the order they appear here when --targets all is given.
#
#  Per-target config fields:
#    module       — module name in targets/ (e.g. "strict_parser")
#    description  — one line shown in the summary report
#    planted_bug  — exception type the target raises on a known input shape
#                   ("" when the target has no deliberate defect)
#    trace_lines  — record line and function coverage (slower, off = branches only)
# ─────────────────────────────────────────────────────────────────────────────

_DEFAULT_FLAGS = {
    "planted_bug": "",
    "trace_lines": True,
}

TARGETS: dict[str, dict] = {

    "strict_parser": {
        **_DEFAULT_FLAGS,
        "module":      "strict_parser",
        "description": "Recursive-descent RFC 8259 parser; rejects every extension.",
    },

    "lenient_parser": {
        **_DEFAULT_FLAGS,
        "module":      "lenient_parser",
        "description": "Explicit-stack parser accepting trailing commas and single quotes.",
    },

    "flattener": {
        **_DEFAULT_FLAGS,
        "module":      "flattener",
        "description": "Nested documents to dotted-path / value pairs.",
        "planted_bug": "DepthLimitExceeded",
    },

    "pretty_printer": {
        **_DEFAULT_FLAGS,
        "module":      "pretty_printer",
        "description": "Re-emits documents indented with ASCII-only escapes.",
        "planted_bug": "EmptyKeyInArray",
    },

    "number_validator": {
        **_DEFAULT_FLAGS,
        "module":      "number_validator",
        "description": "Classifies numeric literals by shape and precision.",
        "planted_bug": "PrecisionOverflow",
    },
}
