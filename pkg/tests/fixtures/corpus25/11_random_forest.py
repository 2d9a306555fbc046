import pandas as pd
from sklearn.ensemble import RandomForestClassifier
from sklearn.model_selection import train_test_split

rows = pd.read_csv("loans.csv")
train, test = train_test_split(rows, test_size=0.2)
forest = RandomForestClassifier(n_estimators=100)
forest.fit(train, test)
forest.predict(test)
