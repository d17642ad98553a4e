import sys

from subreak import app

if __name__ == "__main__":
    sys.exit(app.run())
