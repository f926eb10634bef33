from expansion_gym.wrappers.monitor import Monitor
