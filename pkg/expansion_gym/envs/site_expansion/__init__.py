from .site_expansion import SiteExpansion
