"""
martingal: exact discrete martingale-difference systems on [0,1), the
Chang-Wilson-Wolff square function, and sharp Khintchine-type constants.

"""

__version__ = "0.1.0"
