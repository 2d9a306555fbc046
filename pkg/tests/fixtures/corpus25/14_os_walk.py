import os

here = os.getcwd()
joined = os.path.join(here, "data")
exists = os.path.exists(joined)
os.listdir(joined)
