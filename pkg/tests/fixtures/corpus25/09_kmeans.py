import pandas as pd
from sklearn.cluster import KMeans

points = pd.read_csv("points.csv")
clusterer = KMeans(n_clusters=5)
clusterer.fit(points)
labels = clusterer.predict(points)
