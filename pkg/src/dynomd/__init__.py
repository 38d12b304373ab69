"""Dynamic-regret online learning: OMD, AOMD and drifting zero-sum games."""
