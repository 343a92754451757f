"""hotcache package."""
