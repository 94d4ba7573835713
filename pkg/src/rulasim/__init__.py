"""Monte Carlo simulator for distributed-MIMO uplinks with rotary ULAs."""
__version__ = "0.1.0"
