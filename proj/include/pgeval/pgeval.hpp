#pragma once

#include "pgeval/bench.hpp"
#include "pgeval/dtw.hpp"
#include "pgeval/geo.hpp"
#include "pgeval/osm.hpp"
#include "pgeval/placement.hpp"
#include "pgeval/roadnet.hpp"
#include "pgeval/scenario.hpp"
