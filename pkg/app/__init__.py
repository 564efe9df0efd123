# Passive obstacle imaging from correlation data
__version__ = "0.1.0"
