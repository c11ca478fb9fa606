import json
import matplotlib.pyplot as plt

with open("report.json") as fh:
    report = json.load(fh)
rows = report['transitions']
fig, axes = plt.subplots(1, len(rows), figsize=(3 * len(rows), 3), squeeze=False)
for ax, row in zip(axes[0], rows):
    delays = sorted(int(d) for d in row['histogram'])
    ax.bar(delays, [row['histogram'][str(d)] for d in delays])
    ax.set_title(f"M{row['from']}{row['to']}  ADT {row['adt']:.2f}")
    ax.set_xlabel('delay')
fig.tight_layout()
fig.savefig('histogram.png', dpi=150)
