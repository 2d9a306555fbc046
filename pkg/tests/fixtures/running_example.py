import pandas as pd
from sklearn.model_selection import train_test_split
from sklearn import svm

data = pd.read_csv("train.csv", low_memory=False)
clean = data.where(data["Age"] > 0, data["Age"].median())
train, test = train_test_split(clean)
X_train = train[["Age", "Fare"]]
y_train = train.Survived
X_test = test[["Age", "Fare"]]
y_test = test.Survived
model = svm.SVC()
model.fit(X_train, y_train)
model.predict(X_test)
