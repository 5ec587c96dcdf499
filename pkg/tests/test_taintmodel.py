import pytest

from taintminer.errors import EmptySinkSet
from taintminer.taintmodel import (
    FLOW_COLUMNS,
    ExtendedSinkEntry,
    FlowCategory,
    MethodInvocation,
    TaintedFlow,
    load_sinks,
    parse_sinks,
)

NAMED_SINKS = {
    "sendSms", "sendPush", "httpPost", "httpGet", "httpPostJson",
    "sendNotification", "sendNotificationToContacts", "sendPushMessage",
}


def test_default_sinks():
    assert set(load_sinks().names) == NAMED_SINKS


def test_duplicates_blank_lines_and_comments(tmp_path):
    path = tmp_path / "Sinks.txt"
    path.write_text("# mine\nsendSms\n\n  sendSms  \nhttpPost\n")
    assert set(load_sinks(path).names) == {"sendSms", "httpPost"}


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_sinks(tmp_path / "nope.txt")


def test_empty_sink_file_warns():
    with pytest.warns(EmptySinkSet):
        assert len(parse_sinks(["# nothing", ""])) == 0


def test_environment_fallback(tmp_path, monkeypatch):
    path = tmp_path / "s.txt"
    path.write_text("leak\n")
    monkeypatch.setenv("TAINTMINER_SINKS", str(path))
    assert set(load_sinks().names) == {"leak"}


def test_category_order_and_round_trip():
    assert FLOW_COLUMNS == ("Sc_Sn", "eSc_Sn", "Sc_eSn", "eSc_eSn", "Sn_C", "eSn_C")
    for cat in FlowCategory:
        assert FlowCategory(cat.value) is cat


def test_direct_category_table():
    assert FlowCategory.direct(True, True) is FlowCategory.Sc_Sn
    assert FlowCategory.direct(False, True) is FlowCategory.eSc_Sn
    assert FlowCategory.direct(True, False) is FlowCategory.Sc_eSn
    assert FlowCategory.direct(False, False) is FlowCategory.eSc_eSn


def test_extended_sink_check():
    sinks = load_sinks()
    ExtendedSinkEntry("send", "msg", 0, "sendSms").check(sinks, arity=1)
    with pytest.raises(ValueError):
        ExtendedSinkEntry("send", "msg", 1, "sendSms").check(sinks, arity=1)
    with pytest.raises(ValueError):
        ExtendedSinkEntry("send", "msg", 0, "println").check(sinks, arity=1)


def test_invocation_requires_callee():
    with pytest.raises(ValueError):
        MethodInvocation("", (), "m", 1)


def test_flow_json():
    inv = MethodInvocation("sendSms", (("phone",), ("msg",)), "h", 7)
    flow = TaintedFlow("h", inv, "msg", FlowCategory.eSc_Sn)
    assert flow.to_json() == {"method": "h", "callee": "sendSms", "line": 7, "param": "msg", "category": "eSc_Sn"}
