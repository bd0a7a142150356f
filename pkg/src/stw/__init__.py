"""Steps-tree workbench.

Programs are assembled by applying parameterized components to a steps
tree instead of writing textual code.  The tree, together with the ledger
of component applications that produced it, is the program; source code
for any configured target language is generated from it on demand, then
built and executed with ordinary compilers and interpreters.
"""

__version__ = "0.1.0"
