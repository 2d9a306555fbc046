import pandas as pd

raw = pd.read_csv("events.csv")
if use_head:
    frame = raw.head(10)
else:
    frame = raw.tail(10)
frame.to_json("slice.json")
