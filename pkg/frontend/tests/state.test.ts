import { describe, expect, it } from 'vitest';

import { clampState, decodeState, defaultViewState, encodeState } from '../src/state.js';

const HORIZON = 7200;

describe('view state fragment codec', () => {
  it('defaults to the horizon midpoint', () => {
    const state = defaultViewState(HORIZON);
    expect(state.selectedTimestamp).toBe(3600);
    expect(state.brushWindow).toBeNull();
    expect(state.activeMetric).toBe('cpu');
  });

  it('round-trips every field', () => {
    const state = {
      selectedTimestamp: 1234,
      brushWindow: { t_from: 600, t_to: 1800 },
      selectedJob: 'j_03',
      hoveredMachine: 'm_007',
      activeMetric: 'mem' as const,
    };
    const decoded = decodeState(encodeState(state), HORIZON);
    expect(decoded).toEqual(state);
  });

  it('round-trip is stable (encode . decode . encode = encode)', () => {
    const fragment = encodeState({
      selectedTimestamp: 42,
      brushWindow: null,
      selectedJob: 'j_00',
      hoveredMachine: null,
      activeMetric: 'disk',
    });
    expect(encodeState(decodeState(fragment, HORIZON))).toBe(fragment);
  });

  it('clamps the timestamp into the horizon', () => {
    const decoded = decodeState('t=999999&metric=cpu', HORIZON);
    expect(decoded.selectedTimestamp).toBe(HORIZON - 1);
    expect(decodeState('t=-5&metric=cpu', HORIZON).selectedTimestamp).toBe(0);
  });

  it('drops a brush window that has no selected job', () => {
    const decoded = decodeState('t=100&brush=200-400', HORIZON);
    expect(decoded.brushWindow).toBeNull();
    const withJob = decodeState('t=100&job=j_01&brush=200-400', HORIZON);
    expect(withJob.brushWindow).toEqual({ t_from: 200, t_to: 400 });
  });

  it('ignores malformed brushes and unknown metrics', () => {
    const decoded = decodeState('t=100&job=j_1&brush=nope&metric=gpu', HORIZON);
    expect(decoded.brushWindow).toBeNull();
    expect(decoded.activeMetric).toBe('cpu');
  });

  it('clamping trims a brush to the horizon', () => {
    const state = clampState(
      {
        selectedTimestamp: 100,
        brushWindow: { t_from: -50, t_to: 90000 },
        selectedJob: 'j_1',
        hoveredMachine: null,
        activeMetric: 'cpu',
      },
      HORIZON,
    );
    expect(state.brushWindow).toEqual({ t_from: 0, t_to: HORIZON });
  });
});
