#pragma once

#include "ratekit/allocate.hpp"
#include "ratekit/bd.hpp"
#include "ratekit/bitio.hpp"
#include "ratekit/colorspace.hpp"
#include "ratekit/config.hpp"
#include "ratekit/curve.hpp"
#include "ratekit/digest.hpp"
#include "ratekit/errors.hpp"
#include "ratekit/external_codec.hpp"
#include "ratekit/fileio.hpp"
#include "ratekit/image.hpp"
#include "ratekit/metrics.hpp"
#include "ratekit/ms_ssim.hpp"
#include "ratekit/png_io.hpp"
#include "ratekit/report.hpp"
#include "ratekit/resample.hpp"
#include "ratekit/subprocess.hpp"
#include "ratekit/sweep.hpp"
#include "ratekit/toy_codec.hpp"
#include "ratekit/vmaf.hpp"
