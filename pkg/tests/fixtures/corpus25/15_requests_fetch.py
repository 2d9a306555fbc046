import requests

response = requests.get("https://example.org/data.json", timeout=10)
body = response.json()
status = response.raise_for_status()
