# Tests package marker
