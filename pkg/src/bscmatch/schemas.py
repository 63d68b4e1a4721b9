"""JSON Schemas for every document the library writes."""

_NUM = {"type": "number"}
_IDX = {"type": "integer", "minimum": 0}
_POINT = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}

SHAPE = {
    "type": "object",
    "required": ["contours", "label"],
    "properties": {
        "contours": {
            "type": "array",
            "items": {"type": "array", "items": _POINT, "minItems": 1},
        },
        "label": {"type": ["string", "null"]},
    },
}

COST_MATRIX = {
    "type": "object",
    "required": ["m", "n", "values"],
    "properties": {
        "m": _IDX,
        "n": _IDX,
        "values": {"type": "array", "items": {"type": "array", "items": {"type": "number", "minimum": 0}}},
    },
}

_PAIR = {
    "type": "object",
    "required": ["p", "q", "cost"],
    "properties": {"p": _IDX, "q": _IDX, "cost": {"type": "number", "minimum": 0}},
    "additionalProperties": False,
}

PRUNED = {
    "type": "object",
    "required": ["threshold", "kept", "pruned_average_cost"],
    "properties": {
        "threshold": _NUM,
        "kept": {"type": "array", "items": _PAIR, "minItems": 1},
        "kept_count": _IDX,
        "pruned_average_cost": {"type": "number", "minimum": 0},
    },
}

CORRESPONDENCE_SET = {
    "type": "object",
    "required": ["direction", "pairs", "average_cost"],
    "properties": {
        "direction": {"enum": ["forward", "backward"]},
        "pairs": {"type": "array", "items": _PAIR, "minItems": 1},
        "average_cost": {"type": "number", "minimum": 0},
        "pruned": PRUNED,
    },
}

OTSU = {
    "type": "object",
    "required": ["threshold", "low_class_count", "high_class_count", "between_class_variance"],
    "properties": {
        "threshold": _NUM,
        "low_class_count": {"type": "integer", "minimum": 1},
        "high_class_count": _IDX,
        "between_class_variance": {"type": "number", "minimum": 0},
    },
}

TPS_MODEL = {
    "type": "object",
    "required": ["control_points", "kernel_weights", "affine", "lambda"],
    "properties": {
        "control_points": {"type": "array", "items": _POINT},
        "kernel_weights": {"type": "array", "items": _POINT},
        "affine": {"type": "array", "items": _POINT, "minItems": 3, "maxItems": 3},
        "lambda": {"type": "number", "minimum": 0},
    },
}

_ITERATION = {
    "type": "object",
    "required": ["direction", "bidirectional_cost", "pruned_forward_cost",
                 "pruned_backward_cost", "kept_forward", "kept_backward"],
    "properties": {
        "direction": {"enum": ["forward", "backward"]},
        "bidirectional_cost": {"type": "number", "minimum": 0},
        "pruned_forward_cost": {"type": "number", "minimum": 0},
        "pruned_backward_cost": {"type": "number", "minimum": 0},
        "kept_forward": {"type": "integer", "minimum": 1},
        "kept_backward": {"type": "integer", "minimum": 1},
    },
}

MATCH_RESULT = {
    "type": "object",
    "required": ["score", "direction", "per_iteration", "final_correspondences", "warp_models"],
    "properties": {
        "score": {"type": "number", "minimum": 0},
        "direction": {"enum": ["forward", "backward"]},
        "per_iteration": {"type": "array", "items": _ITERATION},
        "final_correspondences": CORRESPONDENCE_SET,
        "warp_models": {"type": "array", "items": TPS_MODEL},
    },
}

BENCH_SUMMARY = {
    "type": "object",
    "required": ["slopes", "sizes"],
    "properties": {
        "slopes": {"type": "object", "additionalProperties": {"type": ["number", "null"]}},
        "sizes": {"type": "array", "items": {"type": "integer"}},
    },
}
