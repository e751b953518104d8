"""
Literal Parser: grammar for the literal expressions embedded in MultiClaim CSV cells

Cells such as `claim`, `instances`, `ocr` and `verdicts` hold Python-style
literal expressions, e.g.

    "(' Are avocados good for you?', ' Are avocados good for you?', [('eng', 1.0)])"
    "[(1525826671.0, 'fb')]"

Supported values: single/double-quoted strings with backslash escapes,
integers, floats, True/False/None, lists, tuples and maps, arbitrarily
nested, with optional trailing commas.
"""

import ast
import math
import warnings
from typing import Any, Dict, List, Tuple, Union

import pyparsing as pp

from .errors import LiteralSyntaxError

pp.ParserElement.enable_packrat()

LiteralValue = Union[str, float, int, bool, None, List[Any], Tuple[Any, ...], Dict[Any, Any]]


def normalize_csv_field(raw: str) -> str:
    """
    Escape raw newlines so a multi-line cell becomes a single-line expression

    Args:
        raw: Decoded CSV cell

    Returns:
        raw with every newline replaced by backslash + n
    """
    return raw.replace("\n", "\\n")


def _decode_string(s, loc, tokens):
    # the token regex only admits well-formed quoted literals
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            return [ast.literal_eval(tokens[0])]
        except (SyntaxError, ValueError) as e:
            raise pp.ParseFatalException(s, loc, f"valid string escape ({e})")


def _decode_number(tokens):
    text = tokens[0]
    if any(c in text for c in ".eE"):
        return [float(text)]
    return [int(text)]


def _to_dict(s, loc, tokens):
    items = list(tokens)
    try:
        return [dict(zip(items[0::2], items[1::2]))]
    except TypeError:
        raise pp.ParseFatalException(s, loc, "hashable map key")


def _build_grammar() -> pp.ParserElement:
    LPAR, RPAR, LBRACK, RBRACK, LBRACE, RBRACE, COLON, COMMA = map(pp.Suppress, "()[]{}:,")

    value = pp.Forward().set_name("value")

    def items(expr):
        return expr + pp.ZeroOrMore(COMMA + expr) + pp.Optional(COMMA)

    string_atom = pp.Regex(
        r"'(?:[^'\\\n]|\\.)*'|\"(?:[^\"\\\n]|\\.)*\""
    ).set_name("string").set_parse_action(_decode_string)

    number = pp.Regex(
        r"[+-]?(?:\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+|\d+)"
    ).set_name("number").set_parse_action(_decode_number)

    constant = (
        pp.Keyword("True").set_parse_action(pp.replace_with(True))
        | pp.Keyword("False").set_parse_action(pp.replace_with(False))
        | pp.Keyword("None").set_parse_action(pp.replace_with(None))
    ).set_name("constant")

    list_expr = (
        LBRACK + pp.Optional(items(value)) + RBRACK
    ).set_name("list").set_parse_action(lambda t: [list(t)])

    empty_tuple = (LPAR + RPAR).set_parse_action(lambda t: [()])
    tuple_expr = (
        LPAR + value + COMMA + pp.Optional(items(value)) + RPAR
    ).set_parse_action(lambda t: [tuple(t)])
    # "(x)" is a parenthesised value, "(x,)" a one-element tuple
    paren_expr = LPAR + value + RPAR
    tuple_like = (empty_tuple | tuple_expr | paren_expr).set_name("tuple")

    pair = value + COLON + value
    dict_expr = (
        LBRACE + pp.Optional(items(pair)) + RBRACE
    ).set_name("map").set_parse_action(_to_dict)

    value <<= string_atom | number | constant | list_expr | tuple_like | dict_expr
    return value


_LITERAL = _build_grammar()


def parse_literal(raw: str) -> LiteralValue:
    """
    Parse one literal expression

    Args:
        raw: Normalized field text (see normalize_csv_field)

    Returns:
        The parsed value (str, int, float, bool, None, list, tuple or dict)

    Raises:
        LiteralSyntaxError: with the failing position and what was expected
    """
    try:
        return _LITERAL.parse_string(raw, parse_all=True)[0]
    except pp.ParseBaseException as e:
        raise LiteralSyntaxError(position=e.loc, expected=e.msg, text=raw) from None


def render_literal(value: LiteralValue) -> str:
    """
    Render a value back to literal source form

    parse_literal(render_literal(v)) == v for every supported value.
    """
    if value is None or isinstance(value, bool):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"Non-finite float has no literal form: {value!r}")
        return repr(value)
    if isinstance(value, str):
        return repr(value)
    if isinstance(value, list):
        return "[" + ", ".join(render_literal(v) for v in value) + "]"
    if isinstance(value, tuple):
        if len(value) == 1:
            return "(" + render_literal(value[0]) + ",)"
        return "(" + ", ".join(render_literal(v) for v in value) + ")"
    if isinstance(value, dict):
        return "{" + ", ".join(
            f"{render_literal(k)}: {render_literal(v)}" for k, v in value.items()
        ) + "}"
    raise TypeError(f"Unsupported literal type: {type(value).__name__}")
