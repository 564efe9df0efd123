# Storage and caching
