#pragma once

// BBC process-calculus toolkit: parsing, structural congruence, bounded
// broadcast/collection reduction, barbed bisimilarity, channel types and the
// hierarchical-aggregation and leader-election generators.

#include "bbc/ast.hpp"
#include "bbc/bisim.hpp"
#include "bbc/congruence.hpp"
#include "bbc/eval.hpp"
#include "bbc/graph_io.hpp"
#include "bbc/parser.hpp"
#include "bbc/printer.hpp"
#include "bbc/protocol.hpp"
#include "bbc/reduction.hpp"
#include "bbc/subst.hpp"
#include "bbc/typesys.hpp"
