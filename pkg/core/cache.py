# core/cache.py
from cachetools import LRUCache, TTLCache

# -- Cache Stores --------------------------------------
tables_cache = LRUCache(maxsize=4)              # sieved ArithTables, by (N, k_list)
spec_cache   = LRUCache(maxsize=32)             # ExpSumSpecs, by label/X/k/alpha/table key
config_cache = TTLCache(maxsize=16, ttl=300)    # 5 min: parsed JSON config files

# -- Cache Key Builders --------------------------------
def table_ks(k_list):
    """k values that get their own d_k table (k = 2 is served from d)"""
    return tuple(sorted({int(k) for k in k_list if int(k) != 2}))

def tables_key(N, k_list):                      return f't:{int(N)}:{",".join(str(k) for k in table_ks(k_list))}'
def spec_key(label, X, table_key, k=0, alpha=0.0, max_terms=0):
    return f's:{label}:{X!r}:{k}:{alpha!r}:{max_terms}:{table_key}'
def config_key(path):                           return f'cfg:{path}'

# -- Invalidation Helpers ------------------------------
def invalidate_tables(N, k_list):
    tables_cache.pop(tables_key(N, k_list), None)
    # specs built on those tables go with them
    marker = f':{(int(N), table_ks(k_list))}'
    for k in [k for k in spec_cache if k.endswith(marker)]:
        spec_cache.pop(k, None)

def invalidate_config(path):
    config_cache.pop(config_key(path), None)

def clear_all():
    tables_cache.clear()
    spec_cache.clear()
    config_cache.clear()
