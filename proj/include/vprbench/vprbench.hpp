#pragma once

#include "vprbench/error.hpp"
#include "vprbench/imaging.hpp"
#include "vprbench/image_io.hpp"
#include "vprbench/hog.hpp"
#include "vprbench/cohog.hpp"
#include "vprbench/matching.hpp"
#include "vprbench/rmf.hpp"
#include "vprbench/telemetry.hpp"
#include "vprbench/harness/config.hpp"
#include "vprbench/harness/dataset.hpp"
#include "vprbench/harness/descriptor_io.hpp"
#include "vprbench/harness/report.hpp"
#include "vprbench/harness/benchmark.hpp"
#include "vprbench/harness/synthetic.hpp"
