import numpy as np


class Smoother:
    def __init__(self, window):
        self.window = window

    def apply(self, series):
        kernel = np.ones(5)
        return np.convolve(series, kernel)


smoother = Smoother(5)
smoother.apply(signal)
