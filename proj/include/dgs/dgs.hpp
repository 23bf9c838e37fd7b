#pragma once

#include "dgs/bench.hpp"
#include "dgs/error.hpp"
#include "dgs/flow.hpp"
#include "dgs/image.hpp"
#include "dgs/motion.hpp"
#include "dgs/parallel.hpp"
#include "dgs/pretext.hpp"
#include "dgs/probe.hpp"
#include "dgs/raster_io.hpp"
#include "dgs/snippet.hpp"
#include "dgs/synth.hpp"
#include "dgs/version.hpp"
#include "dgs/video_io.hpp"
