import pandas as pd
import matplotlib.pyplot as plt

df = pd.read_csv("trace.csv")
fig, ax = plt.subplots(figsize=(9, 4))
ax.plot(df['k'], df['r1'].abs(), label='|r1|')
ax.plot(df['k'], df['r2'].abs(), label='|r2|')
ax.plot(df['k'], df['r3'].abs(), label='|r3|')
ax.step(df['k'], df['eps'], where='post', color='k', linestyle='--', label='threshold')
for k in df.loc[df['sigma'].diff().fillna(0) != 0, 'k']:
    ax.axvline(k, color='tab:red', alpha=0.4)
for k in df.loc[df['isolation'] == 1, 'k']:
    ax.axvline(k, color='tab:green', linestyle=':', alpha=0.6)
ax.set_xlabel('k')
ax.set_yscale('log')
ax.legend()
fig.tight_layout()
fig.savefig('trace.png', dpi=150)
