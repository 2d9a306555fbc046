import numpy as np
from sklearn.decomposition import PCA

data = np.load("embeddings.npy")
reducer = PCA(n_components=2)
reducer.fit(data)
