"""Turn device records into 64x32 two-hot matrices and back.

    python3 demos/01_encode_devices.py
"""
import numpy as np

from decoyforge.devices import assign_device_types, assign_os_label, build_vocabulary, bundled_corpus, parse_record
from decoyforge.encoding import decode, encode

record = """{"os": "Windows Server 2019", "os_build": "17763",
 "services": [{"port": 135, "module": "msrpc", "cpe": "cpe:/o:microsoft:windows"},
              {"port": 139, "module": "smb"},
              {"port": 445, "module": "smb", "cpe": "cpe:/o:microsoft:windows"}]}"""
device = parse_record(record)
print(device)
print("OS label:", assign_os_label(device).value)
print("device types:", sorted(assign_device_types(device)))

# the vocabulary is learned from a corpus; the bundled one holds 3000 synthetic devices
corpus = bundled_corpus()
vocab = build_vocabulary(corpus + [device])
print("port columns:", vocab.ports)

m = encode(device, vocab)
print("matrix", m.shape, "ones per column:", set(m.sum(axis=0)))

# upper half of each column names the service (or OS string), lower half the CPE (or build)
for j in range(32):
    top, bottom = m[:32, j].argmax(), m[32:, j].argmax()
    if top or bottom:
        what = "os/build" if j == 0 else "version" if j == 1 else f"port {vocab.ports[j - 2]}"
        print(f"  column {j:2d} ({what}): upper row {top}, lower row {bottom}")

back = decode(m, vocab)
print("round trip exact:", back == device)

# unknown symbols decode to the <other> marker instead of failing
odd = parse_record('{"os": "Plan 9", "services": [{"port": 80, "module": "gopher"}]}')
print(decode(encode(odd, vocab), vocab))
print("fraction of corpus fully covered by the vocabulary:",
      np.mean([decode(encode(c, vocab), vocab) == c for c in corpus[:500]]))
