# anchors pytest's rootdir and puts this directory (oracles.py) on sys.path
