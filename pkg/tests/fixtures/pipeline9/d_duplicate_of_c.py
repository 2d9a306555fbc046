import numpy as np

values = np.arange(5)
np.mean(values)
