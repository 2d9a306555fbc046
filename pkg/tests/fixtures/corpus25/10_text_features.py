from sklearn.feature_extraction.text import TfidfVectorizer
from sklearn.naive_bayes import MultinomialNB

vectorizer = TfidfVectorizer(stop_words="english")
features = vectorizer.fit_transform(corpus)
classifier = MultinomialNB()
classifier.fit(features, labels)
