// Address the contract-test backend binds to (see live.setup.ts).
export const LIVE_BASE_URL = 'http://127.0.0.1:8931';
