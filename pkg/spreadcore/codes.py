"""Exit codes shared by the command line and the report writers."""


def _make_into_dict(tupledict):
    """Transform a ``value, keys`` tupledict."""
    newdict = {}
    for value, keys in tupledict.items():
        for key in keys:
            newdict[key] = value
    return newdict


_codes = {
    0: ("ok", "pass", "determinate"),
    1: ("operational_error", "usage_error"),
    2: ("hypothesis_failure", "verdict_failure", "front_hit_boundary"),
}

codes = _make_into_dict(_codes)
