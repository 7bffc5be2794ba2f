from adcp import exceptions, state
from . import testing

STATE_FOO = 0x10
STATE_BAR = 0x11
STATE_BAZ = 0x12


class Test(state.StateManager):

    STATE_MAP = {
        state.STATE_UNINITIALIZED: 'Uninitialized',
        state.STATE_EXCEPTION: 'Exception',
        STATE_FOO: 'Foo',
        STATE_BAR: 'Bar',
        STATE_BAZ: 'Baz',

    }
    STATE_TRANSITIONS = {
        state.STATE_UNINITIALIZED: [STATE_FOO, STATE_BAR],
        state.STATE_EXCEPTION: [],
        STATE_FOO: [STATE_BAR],
        STATE_BAR: [STATE_BAZ],
        STATE_BAZ: [STATE_FOO]
    }

    def set_state(self, value: int) -> None:
        self._set_state(value)

    def set_exception(self, exc):
        self._set_state(state.STATE_EXCEPTION, exc)


class TestCase(testing.TestCase):

    def setUp(self) -> None:
        super().setUp()
        self.obj = Test()

    def test_state_transitions(self):
        self.assert_state(self.obj, state.STATE_UNINITIALIZED)
        self.obj.set_state(STATE_FOO)
        self.assert_state(self.obj, STATE_FOO)
        self.obj.set_state(STATE_BAR)
        self.assert_state(self.obj, STATE_BAR)
        self.obj.set_state(STATE_BAZ)
        self.assert_state(self.obj, STATE_BAZ)
        self.obj.set_state(STATE_FOO)
        self.assert_state(self.obj, STATE_FOO)

    def test_invalid_state_transition(self):
        self.assert_state(self.obj, state.STATE_UNINITIALIZED)
        with self.assertRaises(exceptions.StateTransitionError):
            self.obj.set_state(STATE_BAZ)

    def test_setting_state_to_same_value(self):
        self.obj.set_state(STATE_FOO)
        started = self.obj._state_start
        self.obj.set_state(STATE_FOO)
        self.assert_state(self.obj, STATE_FOO)
        self.assertEqual(self.obj._state_start, started)

    def test_exception_is_reachable_from_any_state(self):
        self.obj.set_state(STATE_FOO)
        error = RuntimeError('boom')
        self.obj.set_exception(error)
        self.assert_state(self.obj, state.STATE_EXCEPTION)
        self.assertIs(self.obj.exception, error)

    def test_no_transitions_out_of_exception(self):
        self.obj.set_exception(RuntimeError('boom'))
        with self.assertRaises(exceptions.StateTransitionError):
            self.obj.set_state(STATE_FOO)

    def test_timers(self):
        self.assertGreaterEqual(self.obj.time_in_state, 0.0)
        self.obj.set_state(STATE_FOO)
        self.assertGreaterEqual(self.obj.elapsed, self.obj.time_in_state)

    def test_state_description(self):
        self.assertEqual(self.obj.state_description(STATE_BAR), 'Bar')
