# Shared errors, output writers and the CLI commands
