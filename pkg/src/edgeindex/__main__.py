from edgeindex.cli import entry

entry()
