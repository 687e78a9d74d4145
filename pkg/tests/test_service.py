import pytest
from fastapi.testclient import TestClient

from t34sim.service import MAX_ADVANCE_SECONDS, create_app, default_session
from t34sim.sim import Scenario, Session


@pytest.fixture()
def client():
    with TestClient(create_app()) as client:
        yield client


def power_on(client):
    return client.post("/events", json={"kind": "button", "button": "ON_OFF"})


class TestSnapshot:
    def test_boot_snapshot(self, client):
        payload = client.get("/session").json()
        assert payload["curr"] == "OFF"
        assert payload["prev"] == "OFF"
        assert payload["t"] == 0
        assert payload["event"] is None
        assert payload["battery"] == 99
        assert payload["supported_syringes"] == 2
        assert payload["locked"] is False
        assert payload["mutations"] == []
        # the four seed-load lines are already rendered with timestamps
        assert len(payload["log"]) == 4
        assert payload["log"][0].endswith(" : BRAUN Omnifix")

    def test_snapshot_tracks_steps(self, client):
        power_on(client)
        payload = client.get("/session").json()
        assert payload["curr"] == "PRELOADING"  # settle timer drained at 0 s


class TestPostEvents:
    def test_button_returns_every_step(self, client):
        body = power_on(client).json()
        assert body["t"] == 0
        assert [step["curr"] for step in body["steps"]] == ["IDLE", "PRELOADING"]
        first = body["steps"][0]
        assert first["line1"] == "Syringe Pump"
        assert first["log"][-1].endswith("PREVIOUS STATE is:OFF")

    def test_advance_moves_time(self, client):
        power_on(client)
        body = client.post("/events", json={"kind": "advance", "seconds": 10}).json()
        assert body["t"] == 10
        assert [step["curr"] for step in body["steps"]] == ["ACTUATOR_ON"]
        assert body["steps"][0]["t"] == 4  # the preload window fired mid-advance

    def test_sensor_and_timer_events(self, client):
        power_on(client)
        client.post("/events", json={"kind": "advance", "seconds": 10})
        for sensor in ("CLAMP", "PLUNGER", "FLANGE"):
            body = client.post("/events", json={"kind": "sensor", "id": sensor,
                                                "value": 1}).json()
        assert body["steps"][0]["curr"] == "SYRINGE_LOADED"

    def test_malformed_event_is_422_and_touches_nothing(self, client):
        power_on(client)
        before = client.get("/session").json()
        for payload in ({"kind": "warp"},
                        {"kind": "button", "button": "MAYBE"},
                        {"kind": "advance", "seconds": -1},
                        {"kind": "advance", "seconds": True},
                        {"kind": "advance", "seconds": MAX_ADVANCE_SECONDS + 1},
                        {"kind": "advance", "seconds": 1, "warp": 9}):
            response = client.post("/events", json=payload)
            assert response.status_code == 422, payload
        assert client.get("/session").json() == before

    def test_posts_apply_in_order(self, client):
        power_on(client)
        client.post("/events", json={"kind": "advance", "seconds": 10})
        for sensor in ("CLAMP", "PLUNGER", "FLANGE"):
            client.post("/events", json={"kind": "sensor", "id": sensor, "value": 1})
        for _ in range(3):
            body = client.post("/events",
                               json={"kind": "button", "button": "YES_START"}).json()
        assert body["steps"][0]["curr"] == "INFUSION_STARTED"


class TestStream:
    def test_snapshot_then_pushes(self, client):
        with client.websocket_connect("/stream") as stream:
            hello = stream.receive_json()
            assert hello["curr"] == "OFF"
            assert hello["event"] is None
            power_on(client)
            first = stream.receive_json()
            second = stream.receive_json()
            assert first["curr"] == "IDLE"
            assert first["event"] == {"kind": "button", "button": "ON_OFF",
                                      "press": "SINGLE"}
            assert second["curr"] == "PRELOADING"

    def test_push_equals_post_response(self, client):
        with client.websocket_connect("/stream") as stream:
            stream.receive_json()
            posted = power_on(client).json()["steps"]
            pushed = [stream.receive_json() for _ in posted]
            assert pushed == posted

    def test_inbound_messages_are_ignored(self, client):
        with client.websocket_connect("/stream") as stream:
            stream.receive_json()
            stream.send_text("noise")
            power_on(client)
            assert stream.receive_json()["curr"] == "IDLE"


class TestSessionWiring:
    def test_default_session_battery(self):
        session = default_session()
        assert session.state.hardware.battery_level == 99

    def test_custom_session_is_served(self):
        session = Session(Scenario(seed=7, hardware={"battery_level": 50}))
        with TestClient(create_app(session)) as client:
            assert client.get("/session").json()["battery"] == 50
