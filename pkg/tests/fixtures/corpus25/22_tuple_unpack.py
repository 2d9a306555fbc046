import pandas as pd
from sklearn.model_selection import train_test_split

full = pd.read_csv("full.csv")
train, test = train_test_split(full, random_state=7)
train.to_csv("train.csv")
test.to_csv("test.csv")
