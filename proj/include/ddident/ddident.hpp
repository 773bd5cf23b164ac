#pragma once

#include "ddident/analysis.hpp"
#include "ddident/channel.hpp"
#include "ddident/errors.hpp"
#include "ddident/estimation.hpp"
#include "ddident/harness.hpp"
#include "ddident/io.hpp"
#include "ddident/measures.hpp"
#include "ddident/rng.hpp"
#include "ddident/version.hpp"
